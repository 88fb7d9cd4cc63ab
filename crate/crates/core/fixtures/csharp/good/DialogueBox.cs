using System.Text;
using UnityEngine;
using UnityEngine.UI;

public class DialogueBox : MonoBehaviour
{
    [SerializeField] private Text label;
    [SerializeField] private char separator = '|';

    private const string SavePath = @"C:\Saves\dialogue.txt";

    public void Show(string speaker, string line)
    {
        var sb = new StringBuilder();
        sb.Append(speaker).Append(separator).Append(' ');
        sb.Append(line.Replace("\"", "'"));
        label.text = sb.ToString();
        gameObject.SetActive(true);
    }

    public void Hide()
    {
        // Keep the object around; just hide it. Path: /* not a comment */
        gameObject.SetActive(false);
        Debug.Log(@"Dialogue ""hidden"" at " + SavePath);
    }
}
